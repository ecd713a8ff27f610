#include <glog/logging.h>

#include <iostream>
#include <string>
#include <vector>

#include "cli.h"

int main(int argc, char** argv) {
  FLAGS_logtostderr = true;
  google::InitGoogleLogging(argv[0]);
  const std::vector<std::string> args(argv, argv + argc);
  return swrm::cli::run(args, std::cout, std::cerr);
}
