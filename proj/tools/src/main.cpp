#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "ptspectra/errors.hpp"
#include "run_config.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args;
    args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    try {
        const ptcli::RunConfig cfg = ptcli::parse_args(args);
        return ptcli::run(cfg);
    } catch (const ptcli::CliExit& e) {
        return e.code;
    } catch (const ptspectra::NonConvergence& e) {
        std::fprintf(stderr, "error: numerical-failure: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: invalid-config: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 1;
    }
}
