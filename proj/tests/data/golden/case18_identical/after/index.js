// same
function f(a) {
  if (a) return 1;
  return 2;
}
const g = 3;
