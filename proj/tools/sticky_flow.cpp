// sticky_flow: command-line front end for the sticky particle library.

#include "sticky/cli.hpp"

int main(int argc, char** argv) { return sticky::cli::run(argc, argv); }
