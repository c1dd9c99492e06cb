#include <atomic>
#include <csignal>
#include <iostream>

#include "dicr/cli/commands.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  return dicr::cli::run(argc, argv, std::cin, std::cout, std::cerr, &g_stop);
}
