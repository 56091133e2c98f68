#include <iostream>

#include "acceptance.hpp"

int main() {
  const auto results = uosam::acceptance::run_all({}, std::cout);
  return uosam::acceptance::exit_status(results);
}
