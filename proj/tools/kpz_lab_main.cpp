#include <kpzlab/cli.hpp>

int main(int argc, char** argv) { return kpzlab::cli::run(argc, argv); }
