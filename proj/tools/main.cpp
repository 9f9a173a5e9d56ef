#include "mcf/cli.hpp"

int main(int argc, char** argv) { return mcf::cli_main(argc, argv); }
