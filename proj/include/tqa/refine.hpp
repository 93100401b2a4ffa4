#pragma once

#include <memory>
#include <string>
#include <vector>

namespace tqa {

struct ParagraphId {
    std::string article;
    int ordinal = 0;

    bool operator==(const ParagraphId&) const = default;
};

// Consecutive run of at most 100 whitespace tokens of one article.
struct Paragraph {
    ParagraphId id;
    std::string text;
    int word_count = 0;
};

// Greedy whitespace-token chunking; the final chunk may be shorter. Joining
// the chunks with single spaces reproduces the article's token sequence.
std::vector<Paragraph> split_paragraphs(const std::string& article, const std::string& article_id,
                                        int words_per_paragraph = 100);

// Embeds text into unit-length vectors of a fixed dimension; identical text
// always produces an identical vector.
class RelevanceScorer {
  public:
    virtual ~RelevanceScorer() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const std::string& t : texts) out.push_back(embed(t));
        return out;
    }
};

// Deterministic lexical scorer: TF-IDF term vectors over the corpus it was
// fitted on, cosine similarity. Tokens are lowercased whitespace tokens with
// leading/trailing punctuation stripped.
class TfIdfScorer : public RelevanceScorer {
  public:
    explicit TfIdfScorer(const std::vector<std::string>& corpus);
    std::size_t dimension() const override { return vocab_.size(); }
    std::vector<double> embed(const std::string& text) override;

  private:
    std::vector<std::string> vocab_;  // sorted
    std::vector<double> idf_;
};

// Client for a remote embedding service: POST {"texts": [...]} to the
// endpoint, expect {"vectors": [[...], ...]}, one unit vector per text.
// Requests carry at most kBatchSize texts; any failure aborts the refinement
// rather than silently truncating context.
class RemoteScorer : public RelevanceScorer {
  public:
    static constexpr std::size_t kBatchSize = 64;

    explicit RemoteScorer(const std::string& endpoint);
    std::size_t dimension() const override { return dimension_; }
    std::vector<double> embed(const std::string& text) override;
    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override;

  private:
    std::string base_;  // scheme://host:port
    std::string path_;
    std::size_t dimension_ = 0;
};

std::vector<std::string> scorer_tokens(const std::string& text);

struct ScoredParagraph {
    Paragraph paragraph;
    double score = 0.0;  // cosine in [-1, 1]
};

// One score per paragraph, input order preserved. Scorer failures are
// rethrown with the offending paragraph ids attached.
std::vector<ScoredParagraph> score_paragraphs(const std::string& question,
                                              const std::vector<Paragraph>& paragraphs,
                                              RelevanceScorer& scorer);

struct RefinementConfig {
    int k = 100;
};

// Builds a scorer for the paragraph corpus at hand. The lexical provider fits
// TF-IDF on it; the remote provider ignores it.
class ScorerProvider {
  public:
    virtual ~ScorerProvider() = default;
    virtual std::unique_ptr<RelevanceScorer> make(const std::vector<Paragraph>& corpus) = 0;
};

class LexicalScorerProvider : public ScorerProvider {
  public:
    std::unique_ptr<RelevanceScorer> make(const std::vector<Paragraph>& corpus) override;
};

class RemoteScorerProvider : public ScorerProvider {
  public:
    explicit RemoteScorerProvider(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::unique_ptr<RelevanceScorer> make(const std::vector<Paragraph>& corpus) override;

  private:
    std::string endpoint_;
};

// Splits all articles, scores every paragraph against the question and
// returns the k best in descending score order (ties by article id, then
// ordinal). Returns everything when fewer than k paragraphs exist.
std::vector<ScoredParagraph> refine_context(const std::string& question,
                                            const std::vector<std::pair<std::string, std::string>>& articles,
                                            const RefinementConfig& cfg, ScorerProvider& provider);

struct ArticleRef {
    std::string id;    // file name
    std::string path;  // readable path
};

// Pluggable stand-in for live retrieval.
class SearchProvider {
  public:
    virtual ~SearchProvider() = default;
    virtual std::vector<ArticleRef> search(const std::string& question_id, int top_n) = 0;
};

// Reads a manifest mapping question id -> article file names under a corpus
// directory.
class FileSearchProvider : public SearchProvider {
  public:
    FileSearchProvider(const std::string& manifest_path, const std::string& corpus_dir);
    std::vector<ArticleRef> search(const std::string& question_id, int top_n) override;

  private:
    std::string corpus_dir_;
    std::vector<std::pair<std::string, std::vector<std::string>>> entries_;
};

}  // namespace tqa
