#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fc/context.hpp"
#include "fc/lang.hpp"
#include "fc/values.hpp"

namespace fc {

struct Export {
  ValueTree tree;
  Value root_value;
};

/// A runtime failure inside a round, tagged with the Path of the failing node.
class EvalError : public FcError {
 public:
  EvalError(Path path, const std::string& what);
  const Path& path() const { return path_; }
  const std::string& detail() const { return detail_; }

 private:
  Path path_;
  std::string detail_;
};

/// Called once per visited Nbr site with the gathered neighbouring value.
using NbrObserver = std::function<void(const Path&, const NeighbouringValue&)>;

/// One round at one device. `program` must be desugared.
Export eval_round(const Program& program, const RoundContext& ctx, const NbrObserver& observer = {});

/// Builds the neighbouring value at an Nbr site from the neighbours' exports.
/// `path` addresses the Nbr node; the shared value lives at its child 0.
NeighbouringValue gather_nbr(const RoundContext& ctx, const Path& path, NbrScope scope,
                             const LocalValue& own);

/// The value a Rep site produced in this device's previous round, if visited.
std::optional<Value> rep_prev(const RoundContext& ctx, const Path& path);

/// Every path at which a node for a sub-expression matching `pred` may appear
/// in an export, following user calls (recursion is not unfolded) and both
/// branches of each If.
std::vector<std::pair<Path, const Expr*>> static_sites(const Program& program,
                                                       const std::function<bool(const Expr&)>& pred);

}  // namespace fc
