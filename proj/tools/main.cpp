#include "cli.hpp"

int main(int argc, char** argv) { return divtest::cli::main_entry(argc, argv); }
