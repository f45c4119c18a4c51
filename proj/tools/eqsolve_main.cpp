#include "eqsolve/cli.hpp"

int main(int argc, char** argv) { return eqsolve::cli_main(argc, argv); }
