#include "cli.hpp"

int main(int argc, char** argv) { return terraclass::run_cli(argc, argv); }
