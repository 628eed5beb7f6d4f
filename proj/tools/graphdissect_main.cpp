#include "graphdissect/cli.hpp"

int main(int argc, char** argv) { return graphdissect::cli::run(argc, argv); }
