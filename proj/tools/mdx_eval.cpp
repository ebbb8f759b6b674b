#include "mdx/cli.hpp"

int main(int argc, char** argv) { return mdx::cli::run(argc, argv, std::cout, std::cerr); }
