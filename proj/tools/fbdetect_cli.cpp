#include "fbdetect/cli.hpp"

int main(int argc, char** argv) { return fbdetect::cli::run(argc, argv); }
