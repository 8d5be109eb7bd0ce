#include "finsler/cli.hpp"

int main(int argc, char** argv) { return finsler::cli::main(argc, argv); }
