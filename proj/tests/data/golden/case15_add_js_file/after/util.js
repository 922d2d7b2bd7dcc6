// helpers
function u() {
  return 1;
}
const K = 2;
