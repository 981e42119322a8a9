#include "pxmix/pipeline.hpp"

int main(int argc, char** argv) { return pxmix::cli_main(argc, argv); }
