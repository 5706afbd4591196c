#include "sndh/cli.hpp"

int main(int argc, char** argv) { return sndh::cli::run(argc, argv); }
