#include "sgn/cli.hpp"

int main(int argc, char** argv) { return sgn::run_cli(argc, argv); }
