#include "tunesel/cli.hpp"

int main(int argc, char** argv) { return tunesel::run_cli(argc, argv); }
