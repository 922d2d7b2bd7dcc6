/* legacy */
function f() {
  return 1;
}
