#include "prefscore/cli.hpp"

int main(int argc, char** argv) { return prefscore::cli::run(argc, argv); }
