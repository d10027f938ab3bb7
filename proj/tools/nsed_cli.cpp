#include "nsed/cli.hpp"

int main(int argc, char** argv) { return nsed::cli::run_cli(argc, argv); }
