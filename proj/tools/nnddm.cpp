#include "nnddm/cli.hpp"

int main(int argc, char** argv) { return nnddm::dispatch(argc, argv); }
