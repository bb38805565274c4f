#include "dualflow/errors.hpp"

#include <sstream>

namespace dualflow {

namespace {
std::string infeasible_message(double margin, std::size_t k, std::size_t s) {
  std::ostringstream os;
  os << "infeasible dual: min eigenvalue margin " << margin << " at time slice " << k
     << ", node " << s;
  return os.str();
}
}  // namespace

Infeasible::Infeasible(double margin, std::size_t time_index, std::size_t space_index)
    : std::runtime_error(infeasible_message(margin, time_index, space_index)),
      margin_(margin),
      time_index_(time_index),
      space_index_(space_index) {}

}  // namespace dualflow
