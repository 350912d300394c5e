#include "leverage/cli.hpp"

int main(int argc, char** argv) { return leverage::cli::run(argc, argv); }
