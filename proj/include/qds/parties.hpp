#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qds/imaging.hpp"
#include "qds/photonics.hpp"
#include "qds/records.hpp"
#include "qds/timebase.hpp"

// The three-party protocol: Alice signs, Bob and Charlie receive. The
// distribution stage encodes detections, discards multi-photon frames,
// discloses an error-estimation sample, performs frame-and-bin sifting and
// symmetrizes Bob's and Charlie's holdings. The messaging stage signs a
// multi-bit message by frame-number selection and verifies it by ghost
// imaging against per-slot noise-factor thresholds.

namespace qds {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// -- Transcript ------------------------------------------------------------

// All inter-party communication passes through recorded channels. Payload
// text is retained in memory for test inspection; the file form carries a
// digest per line.
enum class ChannelSecurity { Authenticated, Secure };

struct TranscriptEntry {
  std::string from;
  std::string to;
  ChannelSecurity security = ChannelSecurity::Authenticated;
  std::string step;     // protocol step tag, e.g. "sift-announce"
  std::string payload;  // empty when payload recording is off
  std::uint64_t digest = 0;
};

struct Transcript {
  bool keep_payloads = true;
  std::vector<TranscriptEntry> entries;

  void log(const std::string& from, const std::string& to,
           ChannelSecurity security, const std::string& step,
           const std::string& payload);
  // One line per message: direction, step tag, payload digest.
  void write(std::ostream& os) const;
};

// -- Distribution stage ----------------------------------------------------

struct ChannelEstimate {
  double e_hat = 0.0;
  std::size_t sample_size = 0;
  double chi_bound = 0.0;  // externally supplied eavesdropping bound
};

// Alice holds S^A = (X^A, Y^A); Bob holds S^B = (X^B_keep, Y^C_forward);
// Charlie holds S^C = (X^B_forward, Y^C_keep).
struct PartyState {
  EncodingParams encoding;
  RecordBlock alice_x, alice_y;            // S^A
  RecordBlock bob_keep, bob_from_charlie;  // S^B: X^B_keep, Y^C_forward
  RecordBlock charlie_from_bob, charlie_keep;  // S^C: X^B_forward, Y^C_keep
  ChannelEstimate estimate_x, estimate_y;
};

struct ChannelBounds {
  double chi_x = 0.0;  // chi_AB
  double chi_y = 0.0;  // chi_AC
};

// Executes distribution steps: encoding, multi-photon discard, random
// disclosure of disclose_fraction of coincident frames per channel for error
// estimation (disclosed frames consumed), frame-and-bin sifting, and the
// Bob-Charlie secret half exchange. Throws ProtocolError when a post-sift
// block comes out empty.
PartyState run_distribution(const RawDetections& detections,
                            const EncodingParams& params,
                            double disclose_fraction, std::uint64_t seed,
                            const ChannelBounds& bounds,
                            Transcript* transcript = nullptr);

// e_hat = (# slot disagreements) / (# compared frames), over the frames the
// two disclosed lists share. Throws ProtocolError when no frame is
// comparable.
std::pair<double, std::size_t> estimate_channel(
    const std::vector<SiftedRecord>& disclosed_a,
    const std::vector<SiftedRecord>& disclosed_b);

// Step (5): each block is split into keep/forward halves (sizes differ by at
// most 1) by a uniform random partition unknown to Alice.
struct SymmetrizedBlocks {
  RecordBlock bob_keep, bob_forward;        // from Bob's X^B
  RecordBlock charlie_keep, charlie_forward;  // from Charlie's Y^C
};
SymmetrizedBlocks symmetrize(const RecordBlock& bob_block,
                             const RecordBlock& charlie_block,
                             std::uint64_t seed);

// -- Messaging stage -------------------------------------------------------

struct SignOptions {
  // Test hook: disables Alice's random discard of half her records.
  bool halve = true;
};

// Step (6): Alice discards a uniform random half of S^A, selects the
// remaining records whose slot has message bit 1, and publishes their frame
// numbers. All-0 and all-1 messages are rejected; an empty selection is
// reported as a ProtocolError.
SignatureElements sign(const Message& message, const RecordBlock& alice_x,
                       const RecordBlock& alice_y, std::uint64_t seed,
                       const SignOptions& options = {},
                       Transcript* transcript = nullptr);

// Steps (7)/(8): ghost imaging of sig against both blocks. Accepts iff every
// 0-slot noise factor in both images is strictly below the threshold, where
// the 0-slots come from the claimed message when one accompanies the
// signature and otherwise from each image's own read-out.
struct Decision {
  bool accept = false;
  std::string reason;  // non-empty on reject
  GhostImage image_1, image_2;
  NoiseReport report_1, report_2;
};
Decision recipient_decide(const RecordBlock& part_1, const RecordBlock& part_2,
                          const SignatureElements& sig, double threshold,
                          int slots_per_frame, const Message* claimed = nullptr);

}  // namespace qds
