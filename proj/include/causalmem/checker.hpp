#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalmem/simulator.hpp"

namespace causalmem {

struct MalformedTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IncompleteTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HbVariant { peer, client_server };

/// Strict partial order on update ids, transitively closed.
struct HappenedBefore {
  HbVariant variant = HbVariant::peer;
  std::set<std::pair<UpdateId, UpdateId>> pairs;

  bool before(UpdateId a, UpdateId b) const { return pairs.count({a, b}) != 0; }
  bool concurrent(UpdateId a, UpdateId b) const {
    return a != b && !before(a, b) && !before(b, a);
  }
};

struct SafetyResult {
  bool pass = true;
  std::string witness;
};

struct LivenessResult {
  bool pass = true;
  std::vector<std::string> witnesses;
};

struct LemmaResult {
  std::string name;
  bool pass = true;
  std::string witness;
};

struct Verdict {
  SafetyResult safety;
  LivenessResult liveness;
  std::vector<LemmaResult> lemmas;

  bool pass() const;
  std::string summary() const;
};

HappenedBefore happened_before(const Trace& trace, HbVariant variant);

/// Replica-centric safety: no update applies at a replica while a causal
/// predecessor on a locally stored register is still missing there. The
/// client-server variant additionally checks each served request against the
/// client's session history.
SafetyResult check_safety(const Trace& trace, const Topology& topology,
                          const HappenedBefore& hb);

/// All issued updates reach every holder of their register, every client
/// request is served, and nothing is left buffered after quiescence.
LivenessResult check_liveness(const Trace& trace, const Topology& topology);

/// Internal-consistency invariants of the timestamp protocol, asserted at
/// every applicable trace point:
///  - applied_when_dominated: once a replica's counter on e_ji reaches an
///    incoming update's count, that update has been applied there;
///  - stamp_monotonic: causally ordered updates to a common receiver carry
///    ordered counters on e_ki, strictly when k issued the earlier one;
///  - causal_apply_order: an applied update never precedes its locally
///    relevant causal predecessors.
std::vector<LemmaResult> check_lemmas(const Trace& trace,
                                      const Topology& topology,
                                      const HappenedBefore& hb);

/// Updates applied at the replica by at_step, closed under causal
/// predecessors.
std::set<UpdateId> causal_past(const Trace& trace, ReplicaId replica,
                               int at_step, const HappenedBefore& hb);

/// Runs every check with the variant implied by the trace mode.
Verdict check_trace(const Trace& trace, const Topology& topology);

}  // namespace causalmem
