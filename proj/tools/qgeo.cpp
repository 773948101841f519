#include "qgeo/cli.hpp"

int main(int argc, char** argv) { return qgeo::cli::run(argc, argv); }
