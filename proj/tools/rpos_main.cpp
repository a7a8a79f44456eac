#include "rpos/cli.hpp"

int main(int argc, char** argv) { return rpos::cli_main(argc, argv); }
