#include "divlab/cli.hpp"

int main(int argc, char** argv) { return divlab::cli::run(argc, argv); }
