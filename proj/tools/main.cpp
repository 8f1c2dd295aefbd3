#include "entstats/cli.hpp"

int main(int argc, char** argv) {
    return entstats::cli::run(argc, argv);
}
