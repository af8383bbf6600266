#include "dfp/cli.hpp"

int main(int argc, char** argv) { return dfp::cli_main(argc, argv); }
