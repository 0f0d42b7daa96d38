#include <iostream>

#include "hbundle/cli.hpp"

int main(int argc, char** argv)
{
    hbundle::RunSpec spec;
    if (const auto code = hbundle::parse_args(argc, argv, spec, std::cout, std::cerr))
        return *code;
    return hbundle::run(spec, std::cout, std::cerr);
}
