#include "cli.hpp"

int main(int argc, char** argv) { return mrtr::cli::main(argc, argv); }
