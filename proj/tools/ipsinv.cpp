#include "ipsinv/cli.hpp"

int main(int argc, char** argv) { return ipsinv::cli::run(argc, argv); }
