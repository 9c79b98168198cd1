#include <cstdio>

// placeholder until the subcommand dispatch lands
int main() {
  std::fprintf(stderr, "ctrpipe: no subcommands wired yet\n");
  return 2;
}
