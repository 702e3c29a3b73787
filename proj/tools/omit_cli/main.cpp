#include "cli.hpp"

int main(int argc, char** argv) { return omit::cli::run(argc, argv); }
