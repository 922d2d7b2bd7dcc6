// doc
function f() {
  return 1;
}
