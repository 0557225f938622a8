#include "fpkdescent/cli.hpp"

int main(int argc, char** argv) { return fpkd::run_cli(argc, argv); }
