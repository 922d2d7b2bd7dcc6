function f() {
  a();
  // b removed
}
