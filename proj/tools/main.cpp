#include "commands.hpp"

int main(int argc, char** argv) { return stlsmooth::cli::run(argc, argv); }
