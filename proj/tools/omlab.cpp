#include "omlab/cli.hpp"

int main(int argc, char** argv) { return omlab::run_cli(argc, argv); }
