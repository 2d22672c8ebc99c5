#include "rio/cli.hpp"

int main(int argc, char** argv) { return rio::cli_main(argc, argv); }
