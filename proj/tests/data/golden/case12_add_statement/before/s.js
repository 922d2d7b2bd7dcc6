function f(a) {
  const b = a + 1;
  return b;
}
