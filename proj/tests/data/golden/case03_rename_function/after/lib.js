function h(a) {
  return a * 2;
}
