var cfg = {};
function run() {
  return 1;
}
