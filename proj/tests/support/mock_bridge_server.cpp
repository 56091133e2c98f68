// Protocol server over stdin/stdout backed by the mock oracle. Stands in
// for the external bridge in tests of the stdio transport.

#include <csignal>

#include "loopback.hpp"

int main() {
  std::signal(SIGPIPE, SIG_IGN);
  uosam::bridge::FdConnection io(0, 1);
  uosam::seg::MockOracleBackend mock;
  uosam::testing::serve(io, io, mock);
  return 0;
}
