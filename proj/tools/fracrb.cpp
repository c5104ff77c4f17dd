#include "fracrb/cli.hpp"

int main(int argc, char** argv) {
    return fracrb::cli::main_entry(argc, argv);
}
