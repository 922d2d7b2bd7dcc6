function run() {
  return 1;
}
function stop() {
  return 0;
}
