#include "intervenidar/mdp/mdp.hpp"

#include "intervenidar/mdp/error.hpp"

namespace intervenidar::mdp {

void MdpSpec::validate() const {
  if (action_count <= 0) throw Error("MdpSpec: action set must be non-empty");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("MdpSpec: discount must lie in [0, 1]");
}

}  // namespace intervenidar::mdp
