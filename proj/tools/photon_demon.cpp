#include "photon_demon/cli.hpp"

int main(int argc, char** argv) { return photon_demon::cli::run(argc, argv); }
