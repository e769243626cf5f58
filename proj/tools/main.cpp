#include "a3gcn/cli.hpp"

int main(int argc, char** argv) { return a3gcn::run_cli(argc, argv); }
