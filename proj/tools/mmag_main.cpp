#include "mmag/cli.hpp"

int main(int argc, char** argv) { return mmag::run_cli(argc, argv); }
