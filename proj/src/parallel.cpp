#include "detz/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace detz {

int default_threads()
{
    if (const char* env = std::getenv("DETZ_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        } catch (const std::exception&) {
        }
    }
    return omp_get_num_procs();
}

void set_threads(int n) { omp_set_num_threads(n > 0 ? n : default_threads()); }

int current_threads() { return omp_get_max_threads(); }

}  // namespace detz
