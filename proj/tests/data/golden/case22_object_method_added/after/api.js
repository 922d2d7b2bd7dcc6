const api = {
  a() {
    return 1;
  },
  b() {
    return 2;
  },
};
