#include "cli.hpp"

int main(int argc, char** argv) { return gapcount::cli::run(argc, argv); }
