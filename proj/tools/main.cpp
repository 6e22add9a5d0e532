#include "hdpmpm/cli.hpp"

int main(int argc, char** argv) { return hdpmpm::run_cli(argc, argv); }
