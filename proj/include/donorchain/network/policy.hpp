#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace donorchain::network {

// Endorsement policy as a boolean tree over organizations. Written as
// s-expressions:
//
//   gov                      the org "gov" endorsed
//   (submitter)              the submitting client's org endorsed
//   (and gov (submitter))
//   (or hospA hospB)
//   (outof 2 hospA hospB hospC)
class PolicyExpr {
 public:
  enum class Kind { And, Or, OutOf, Org, Submitter };

  static PolicyExpr org(std::string org_id);
  static PolicyExpr submitter();
  static PolicyExpr all_of(std::vector<PolicyExpr> children);
  static PolicyExpr any_of(std::vector<PolicyExpr> children);
  static PolicyExpr out_of(std::size_t k, std::vector<PolicyExpr> children);

  // Throws Error(PolicyParse).
  static PolicyExpr parse(std::string_view text);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  std::size_t threshold() const { return k_; }
  const std::string& org_id() const { return org_; }
  const std::vector<PolicyExpr>& children() const { return children_; }

  bool evaluate(const std::set<std::string>& endorsing_orgs, const std::string& submitter_org) const;

  std::set<std::string> referenced_orgs() const;
  bool references_submitter() const;

  // A small org set that satisfies the policy for this submitter: all
  // children of AND, the first k of OUTOF, the first child of OR.
  std::set<std::string> choose_endorsers(const std::string& submitter_org) const;

  bool operator==(const PolicyExpr&) const = default;

 private:
  Kind kind_ = Kind::Org;
  std::size_t k_ = 0;
  std::string org_;
  std::vector<PolicyExpr> children_;
};

}  // namespace donorchain::network
