#include "hhimerge/cli.hpp"

int main(int argc, char** argv) {
    return hhimerge::cli::run(argc, argv);
}
