function f(a) {
  return a;
}

function g() {}
