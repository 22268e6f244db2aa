#include "seqdevid/cli.hpp"

int main(int argc, char** argv) { return seqdevid::cli::run(argc, argv); }
