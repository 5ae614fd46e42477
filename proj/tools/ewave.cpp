#include "ewave/cli.hpp"

int main(int argc, char** argv) { return ewave::run_cli(argc, argv); }
