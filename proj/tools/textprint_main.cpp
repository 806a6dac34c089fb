#include "textprint/cli.hpp"

int main(int argc, char** argv) { return textprint::cli::run(argc, argv); }
