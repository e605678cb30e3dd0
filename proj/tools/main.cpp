#include "gasket_cli.hpp"

int main(int argc, char** argv) { return gasket::cli::run(argc, argv); }
