#include "netbridge/cli.hpp"

int main(int argc, char** argv) { return netbridge::cli_main(argc, argv); }
