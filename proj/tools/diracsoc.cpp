#include "diracsoc/cli/commands.hpp"

int main(int argc, char** argv) { return diracsoc::cli::run(argc, argv); }
