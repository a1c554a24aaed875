#pragma once

#include <string>
#include <vector>

namespace strokegen {

enum class BiasKind {
    letter,
    letter_writer,
    classifier_embedding,
    autoencoder_latent,
    external,
};

const char* bias_kind_name(BiasKind kind);
BiasKind bias_kind_from_name(const std::string& name);

// Conditioning input for the generator: the tagged vector fed to the bias
// projection as time step 0.
struct BiasVector {
    BiasKind kind = BiasKind::external;
    std::vector<double> values;
    // provenance
    char letter = '?';
    std::string writer_id;
    std::string source_sample_id;
};

}  // namespace strokegen
