#include "commands.hpp"

int main(int argc, char** argv)
{
    return esn::cli::run(argc, argv);
}
