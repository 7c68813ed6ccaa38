// Regenerates the bundled synthetic corpus: make_synthetic_corpus <dir>

#include "synthetic_corpus.h"

#include <iostream>

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: make_synthetic_corpus <dir>\n";
        return 2;
    }
    vidmeta::fixture::write_synthetic_corpus(argv[1]);
    return 0;
}
