#include "cli.hpp"

int main(int argc, char** argv) { return tgprior::cli::cli_main(argc, argv); }
