#include "diffseg/cli.hpp"

int main(int argc, char** argv) { return diffseg::cli_dispatch(argc, argv); }
