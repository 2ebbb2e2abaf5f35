#include "matern4d/cli_harness.hpp"

int main(int argc, char** argv) { return matern4d::cli_main(argc, argv); }
