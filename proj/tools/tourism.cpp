#include "tourism/cli.hpp"

int main(int argc, char** argv) { return tourism::cli::run(argc, argv); }
