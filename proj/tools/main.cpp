#include "viralens/cli.hpp"

int main(int argc, char** argv) { return viralens::cli::run(argc, argv); }
