#pragma once

#include "formula.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace exsyn
{

enum class sat_status
{
  sat,
  unsat,
  unknown
};

inline char const* to_string( sat_status s )
{
  switch ( s )
  {
  case sat_status::sat:
    return "sat";
  case sat_status::unsat:
    return "unsat";
  default:
    return "unknown";
  }
}

struct sat_budget
{
  std::optional<uint64_t> conflicts;
  std::optional<double> seconds;
  std::atomic<bool> const* stop{nullptr};
};

struct sat_stats
{
  uint64_t conflicts{0};
  uint64_t decisions{0};
  uint64_t propagations{0};
  uint64_t restarts{0};
  uint64_t learnts{0};
  uint64_t deleted{0};
  double seconds{0.0};

  sat_stats& operator+=( sat_stats const& o )
  {
    conflicts += o.conflicts;
    decisions += o.decisions;
    propagations += o.propagations;
    restarts += o.restarts;
    learnts += o.learnts;
    deleted += o.deleted;
    seconds += o.seconds;
    return *this;
  }

  std::string to_key_values() const
  {
    std::ostringstream os;
    os << "conflicts=" << conflicts << "\n"
       << "decisions=" << decisions << "\n"
       << "propagations=" << propagations << "\n"
       << "restarts=" << restarts << "\n"
       << "learnts=" << learnts << "\n"
       << "deleted=" << deleted << "\n"
       << "seconds=" << seconds << "\n";
    return os.str();
  }
};

/*! \brief Conflict-driven clause-learning SAT solver.
 *
 * Two watched literals, first-UIP learning with recursive minimization,
 * VSIDS (decay 0.95), phase saving, Luby restarts (unit 64 conflicts) and
 * LBD-based deletion of learnt clauses; binary and glue clauses are kept.
 * Clauses may be added between calls to solve.
 */
class sat_solver
{
public:
  explicit sat_solver( uint64_t seed = 0u ) : seed_( seed ) {}

  var new_var()
  {
    auto const v = static_cast<uint32_t>( assigns_.size() );
    assigns_.push_back( undef );
    level_.push_back( 0 );
    reason_.push_back( no_reason );
    polarity_.push_back( 1u );
    seen_.push_back( 0u );
    double a = 0.0;
    if ( seed_ )
    {
      rng_.seed( seed_ + v );
      a = std::uniform_real_distribution<double>( 0.0, 1e-5 )( rng_ );
    }
    activity_.push_back( a );
    heap_pos_.push_back( -1 );
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert( v );
    return v + 1u;
  }

  uint32_t num_vars() const { return static_cast<uint32_t>( assigns_.size() ); }

  void reserve_vars( uint32_t n )
  {
    while ( num_vars() < n )
      new_var();
  }

  /*! \brief Adds a clause; returns false once the formula is known unsatisfiable. */
  bool add_clause( std::vector<lit> const& clause )
  {
    if ( !ok_ )
      return false;
    cancel_until( 0 );
    std::vector<uint32_t> c;
    for ( auto l : clause )
    {
      if ( l == 0 )
        throw std::invalid_argument( "literal 0" );
      reserve_vars( var_of( l ) );
      c.push_back( to_internal( l ) );
    }
    std::sort( c.begin(), c.end() );
    c.erase( std::unique( c.begin(), c.end() ), c.end() );
    original_.push_back( clause );
    std::vector<uint32_t> kept;
    for ( auto i = 0u; i < c.size(); ++i )
    {
      if ( i + 1u < c.size() && ( c[i] ^ 1u ) == c[i + 1u] )
        return true; /* tautology */
      auto const v = value( c[i] );
      if ( v == l_true )
        return true;
      if ( v == l_false )
        continue;
      kept.push_back( c[i] );
    }
    if ( kept.empty() )
    {
      ok_ = false;
      return false;
    }
    if ( kept.size() == 1u )
    {
      enqueue( kept[0], no_reason );
      if ( propagate() != no_reason )
        ok_ = false;
      return ok_;
    }
    attach( make_clause( std::move( kept ), false, 0u ) );
    return true;
  }

  bool add_cnf( cnf const& f )
  {
    reserve_vars( f.num_vars );
    for ( auto const& c : f.clauses )
    {
      if ( c.empty() )
      {
        ok_ = false;
        original_.push_back( c );
      }
      else
        add_clause( c );
    }
    return ok_;
  }

  sat_status solve( sat_budget const& budget = {} )
  {
    auto const t0 = std::chrono::steady_clock::now();
    auto const start_conflicts = stats_.conflicts;
    model_.clear();
    sat_status result = sat_status::unknown;
    if ( !ok_ )
      result = sat_status::unsat;
    else
    {
      cancel_until( 0 );
      if ( propagate() != no_reason )
      {
        ok_ = false;
        result = sat_status::unsat;
      }
    }
    uint32_t restart_index = 0;
    while ( result == sat_status::unknown )
    {
      auto const limit = luby( restart_index++ ) * restart_unit;
      result = search( static_cast<uint64_t>( limit ), budget, t0, start_conflicts );
      if ( result == sat_status::unknown && out_of_budget( budget, t0, start_conflicts ) )
        break;
      if ( result == sat_status::unknown )
        ++stats_.restarts;
    }
    if ( result == sat_status::sat )
    {
      model_.assign( num_vars() + 1u, false );
      for ( auto v = 0u; v < num_vars(); ++v )
        model_[v + 1u] = assigns_[v] == l_true;
      if ( !model_satisfies_original() )
        throw std::logic_error( "internal error: model does not satisfy the input clauses" );
    }
    cancel_until( 0 );
    stats_.seconds += std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
    return result;
  }

  /*! \brief Model indexed by variable (entry 0 unused); valid after a sat answer. */
  std::vector<bool> const& model() const { return model_; }
  bool model_value( var v ) const { return model_.at( v ); }
  sat_stats const& stats() const { return stats_; }
  bool okay() const { return ok_; }

private:
  static constexpr uint8_t l_true = 1u;
  static constexpr uint8_t l_false = 0u;
  static constexpr uint8_t undef = 2u;
  static constexpr uint32_t no_reason = 0xffffffffu;
  static constexpr uint32_t restart_unit = 64u;
  static constexpr double var_decay = 0.95;
  static constexpr double clause_decay = 0.999;

  struct clause
  {
    std::vector<uint32_t> lits;
    uint32_t lbd{0};
    float activity{0.0f};
    bool learnt{false};
    bool removed{false};
  };

  struct watcher
  {
    uint32_t cref;
    uint32_t blocker;
  };

  static uint32_t to_internal( lit l ) { return ( ( var_of( l ) - 1u ) << 1 ) | ( l < 0 ? 1u : 0u ); }

  uint8_t value( uint32_t x ) const
  {
    auto const a = assigns_[x >> 1];
    return a == undef ? undef : static_cast<uint8_t>( a ^ ( x & 1u ) );
  }

  uint32_t decision_level() const { return static_cast<uint32_t>( trail_lim_.size() ); }

  uint32_t make_clause( std::vector<uint32_t> lits, bool learnt, uint32_t lbd )
  {
    uint32_t cref;
    if ( !free_.empty() )
    {
      cref = free_.back();
      free_.pop_back();
    }
    else
    {
      cref = static_cast<uint32_t>( clauses_.size() );
      clauses_.emplace_back();
    }
    auto& c = clauses_[cref];
    c.lits = std::move( lits );
    c.learnt = learnt;
    c.lbd = lbd;
    c.activity = 0.0f;
    c.removed = false;
    return cref;
  }

  void attach( uint32_t cref )
  {
    auto const& c = clauses_[cref];
    watches_[c.lits[0]].push_back( {cref, c.lits[1]} );
    watches_[c.lits[1]].push_back( {cref, c.lits[0]} );
  }

  void enqueue( uint32_t x, uint32_t reason )
  {
    auto const v = x >> 1;
    assigns_[v] = static_cast<uint8_t>( ( x & 1u ) ? l_false : l_true );
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back( x );
  }

  uint32_t propagate()
  {
    uint32_t confl = no_reason;
    while ( qhead_ < trail_.size() )
    {
      auto const p = trail_[qhead_++];
      auto const false_lit = p ^ 1u;
      auto& ws = watches_[false_lit];
      ++stats_.propagations;
      size_t i = 0, j = 0;
      auto const n = ws.size();
      while ( i < n )
      {
        auto w = ws[i++];
        if ( value( w.blocker ) == l_true )
        {
          ws[j++] = w;
          continue;
        }
        auto& c = clauses_[w.cref];
        if ( c.removed )
          continue;
        auto& lits = c.lits;
        if ( lits[0] == false_lit )
          std::swap( lits[0], lits[1] );
        auto const first = lits[0];
        if ( first != w.blocker && value( first ) == l_true )
        {
          ws[j++] = {w.cref, first};
          continue;
        }
        bool moved = false;
        for ( size_t k = 2; k < lits.size(); ++k )
        {
          if ( value( lits[k] ) != l_false )
          {
            std::swap( lits[1], lits[k] );
            watches_[lits[1]].push_back( {w.cref, first} );
            moved = true;
            break;
          }
        }
        if ( moved )
          continue;
        ws[j++] = {w.cref, first};
        if ( value( first ) == l_false )
        {
          confl = w.cref;
          qhead_ = static_cast<uint32_t>( trail_.size() );
          while ( i < n )
            ws[j++] = ws[i++];
        }
        else
        {
          enqueue( first, w.cref );
        }
      }
      ws.resize( j );
      if ( confl != no_reason )
        break;
    }
    return confl;
  }

  void cancel_until( uint32_t lvl )
  {
    if ( decision_level() <= lvl )
      return;
    for ( auto i = trail_.size(); i-- > trail_lim_[lvl]; )
    {
      auto const v = trail_[i] >> 1;
      polarity_[v] = trail_[i] & 1u;
      assigns_[v] = undef;
      reason_[v] = no_reason;
      if ( heap_pos_[v] < 0 )
        heap_insert( v );
    }
    trail_.resize( trail_lim_[lvl] );
    trail_lim_.resize( lvl );
    qhead_ = static_cast<uint32_t>( trail_.size() );
  }

  /* --- VSIDS heap ------------------------------------------------------ */

  bool heap_less( uint32_t a, uint32_t b ) const
  {
    return activity_[a] > activity_[b] || ( activity_[a] == activity_[b] && a < b );
  }

  void heap_up( int i )
  {
    auto const v = heap_[i];
    while ( i > 0 )
    {
      int const parent = ( i - 1 ) >> 1;
      if ( !heap_less( v, heap_[parent] ) )
        break;
      heap_[i] = heap_[parent];
      heap_pos_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }

  void heap_down( int i )
  {
    auto const v = heap_[i];
    int const n = static_cast<int>( heap_.size() );
    while ( true )
    {
      int child = 2 * i + 1;
      if ( child >= n )
        break;
      if ( child + 1 < n && heap_less( heap_[child + 1], heap_[child] ) )
        ++child;
      if ( !heap_less( heap_[child], v ) )
        break;
      heap_[i] = heap_[child];
      heap_pos_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }

  void heap_insert( uint32_t v )
  {
    heap_pos_[v] = static_cast<int>( heap_.size() );
    heap_.push_back( v );
    heap_up( heap_pos_[v] );
  }

  uint32_t heap_pop()
  {
    auto const top = heap_[0];
    heap_[0] = heap_.back();
    heap_pos_[heap_[0]] = 0;
    heap_.pop_back();
    heap_pos_[top] = -1;
    if ( !heap_.empty() )
      heap_down( 0 );
    return top;
  }

  void bump_var( uint32_t v )
  {
    activity_[v] += var_inc_;
    if ( activity_[v] > 1e100 )
    {
      for ( auto& a : activity_ )
        a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if ( heap_pos_[v] >= 0 )
      heap_up( heap_pos_[v] );
  }

  void bump_clause( clause& c )
  {
    c.activity += static_cast<float>( cla_inc_ );
    if ( c.activity > 1e20f )
    {
      for ( auto& d : clauses_ )
        d.activity *= 1e-20f;
      cla_inc_ *= 1e-20;
    }
  }

  /* --- conflict analysis ---------------------------------------------- */

  uint32_t abstract_level( uint32_t v ) const { return 1u << ( level_[v] & 31u ); }

  bool lit_redundant( uint32_t p, uint32_t abstract_levels )
  {
    analyze_stack_.clear();
    analyze_stack_.push_back( p );
    auto const top = analyze_toclear_.size();
    while ( !analyze_stack_.empty() )
    {
      auto const q = analyze_stack_.back();
      analyze_stack_.pop_back();
      auto const& c = clauses_[reason_[q >> 1]];
      for ( size_t i = 1; i < c.lits.size(); ++i )
      {
        auto const l = c.lits[i];
        auto const v = l >> 1;
        if ( seen_[v] || level_[v] == 0u )
          continue;
        if ( reason_[v] != no_reason && ( abstract_level( v ) & abstract_levels ) )
        {
          seen_[v] = 1u;
          analyze_stack_.push_back( l );
          analyze_toclear_.push_back( l );
        }
        else
        {
          for ( auto k = top; k < analyze_toclear_.size(); ++k )
            seen_[analyze_toclear_[k] >> 1] = 0u;
          analyze_toclear_.resize( top );
          return false;
        }
      }
    }
    return true;
  }

  void analyze( uint32_t confl, std::vector<uint32_t>& learnt, uint32_t& bt_level, uint32_t& lbd )
  {
    learnt.clear();
    learnt.push_back( 0u );
    int path = 0;
    uint32_t p = 0xffffffffu;
    auto index = trail_.size();
    do
    {
      auto& c = clauses_[confl];
      if ( c.learnt )
        bump_clause( c );
      /* the reason clause of p has p at position 0 */
      for ( size_t i = ( p == 0xffffffffu ) ? 0u : 1u; i < c.lits.size(); ++i )
      {
        auto const q = c.lits[i];
        auto const v = q >> 1;
        if ( !seen_[v] && level_[v] > 0u )
        {
          bump_var( v );
          seen_[v] = 1u;
          if ( level_[v] >= decision_level() )
            ++path;
          else
            learnt.push_back( q );
        }
      }
      while ( !seen_[trail_[--index] >> 1] )
        ;
      p = trail_[index];
      confl = reason_[p >> 1];
      seen_[p >> 1] = 0u;
      --path;
    } while ( path > 0 );
    learnt[0] = p ^ 1u;

    analyze_toclear_ = learnt;
    uint32_t abstract_levels = 0;
    for ( size_t i = 1; i < learnt.size(); ++i )
      abstract_levels |= abstract_level( learnt[i] >> 1 );
    size_t j = 1;
    for ( size_t i = 1; i < learnt.size(); ++i )
    {
      auto const v = learnt[i] >> 1;
      if ( reason_[v] == no_reason || !lit_redundant( learnt[i], abstract_levels ) )
        learnt[j++] = learnt[i];
    }
    learnt.resize( j );

    if ( learnt.size() == 1u )
      bt_level = 0;
    else
    {
      size_t max_i = 1;
      for ( size_t i = 2; i < learnt.size(); ++i )
      {
        if ( level_[learnt[i] >> 1] > level_[learnt[max_i] >> 1] )
          max_i = i;
      }
      std::swap( learnt[1], learnt[max_i] );
      bt_level = level_[learnt[1] >> 1];
    }
    for ( auto l : analyze_toclear_ )
      seen_[l >> 1] = 0u;

    lbd_stamp_.resize( decision_level() + 1u, 0u );
    ++lbd_counter_;
    lbd = 0;
    for ( auto l : learnt )
    {
      auto const lv = level_[l >> 1];
      if ( lbd_stamp_[lv] != lbd_counter_ )
      {
        lbd_stamp_[lv] = lbd_counter_;
        ++lbd;
      }
    }
  }

  /* --- search ---------------------------------------------------------- */

  static double luby( uint32_t x )
  {
    uint32_t size = 1, seq = 0;
    while ( size < x + 1u )
    {
      ++seq;
      size = 2u * size + 1u;
    }
    while ( size - 1u != x )
    {
      size = ( size - 1u ) >> 1;
      --seq;
      x = x % size;
    }
    return static_cast<double>( uint64_t( 1 ) << seq );
  }

  bool out_of_budget( sat_budget const& b, std::chrono::steady_clock::time_point t0, uint64_t start_conflicts ) const
  {
    if ( b.conflicts && stats_.conflicts - start_conflicts >= *b.conflicts )
      return true;
    if ( b.stop && b.stop->load( std::memory_order_relaxed ) )
      return true;
    if ( b.seconds && std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count() >= *b.seconds )
      return true;
    return false;
  }

  bool locked( uint32_t cref ) const
  {
    auto const& c = clauses_[cref];
    auto const v = c.lits[0] >> 1;
    return reason_[v] == cref && value( c.lits[0] ) == l_true;
  }

  void reduce_db()
  {
    std::vector<uint32_t> cand;
    for ( uint32_t i = 0; i < clauses_.size(); ++i )
    {
      auto const& c = clauses_[i];
      if ( c.learnt && !c.removed && c.lits.size() > 2u && c.lbd > 2u && !locked( i ) )
        cand.push_back( i );
    }
    std::sort( cand.begin(), cand.end(), [&]( uint32_t a, uint32_t b ) {
      auto const& x = clauses_[a];
      auto const& y = clauses_[b];
      if ( x.lbd != y.lbd )
        return x.lbd > y.lbd;
      if ( x.activity != y.activity )
        return x.activity < y.activity;
      return a < b;
    } );
    auto const n = cand.size() / 2u;
    for ( size_t i = 0; i < n; ++i )
    {
      auto& c = clauses_[cand[i]];
      c.removed = true;
      ++stats_.deleted;
    }
    for ( auto& ws : watches_ )
    {
      ws.erase( std::remove_if( ws.begin(), ws.end(), [&]( watcher const& w ) { return clauses_[w.cref].removed; } ), ws.end() );
    }
    for ( size_t i = 0; i < n; ++i )
    {
      auto& c = clauses_[cand[i]];
      std::vector<uint32_t>().swap( c.lits );
      free_.push_back( cand[i] );
    }
  }

  sat_status search( uint64_t max_conflicts, sat_budget const& budget, std::chrono::steady_clock::time_point t0,
                     uint64_t start_conflicts )
  {
    uint64_t conflicts = 0;
    std::vector<uint32_t> learnt;
    while ( true )
    {
      auto const confl = propagate();
      if ( confl != no_reason )
      {
        ++stats_.conflicts;
        ++conflicts;
        if ( decision_level() == 0u )
        {
          ok_ = false;
          return sat_status::unsat;
        }
        uint32_t bt = 0, lbd = 0;
        analyze( confl, learnt, bt, lbd );
        cancel_until( bt );
        if ( learnt.size() == 1u )
        {
          enqueue( learnt[0], no_reason );
        }
        else
        {
          auto const cref = make_clause( learnt, true, lbd );
          attach( cref );
          bump_clause( clauses_[cref] );
          enqueue( learnt[0], cref );
          ++stats_.learnts;
        }
        var_inc_ /= var_decay;
        cla_inc_ /= clause_decay;
        if ( stats_.conflicts >= next_reduce_ )
        {
          ++reductions_;
          next_reduce_ = stats_.conflicts + 2000u + 300u * reductions_;
          reduce_db();
        }
        if ( ( stats_.conflicts & 255u ) == 0u && out_of_budget( budget, t0, start_conflicts ) )
        {
          cancel_until( 0 );
          return sat_status::unknown;
        }
        if ( budget.conflicts && stats_.conflicts - start_conflicts >= *budget.conflicts )
        {
          cancel_until( 0 );
          return sat_status::unknown;
        }
      }
      else
      {
        if ( conflicts >= max_conflicts )
        {
          cancel_until( 0 );
          return sat_status::unknown;
        }
        uint32_t next = 0xffffffffu;
        while ( !heap_.empty() )
        {
          auto const v = heap_pop();
          if ( assigns_[v] == undef )
          {
            next = v;
            break;
          }
        }
        if ( next == 0xffffffffu )
          return sat_status::sat;
        ++stats_.decisions;
        trail_lim_.push_back( static_cast<uint32_t>( trail_.size() ) );
        enqueue( ( next << 1 ) | polarity_[next], no_reason );
      }
    }
  }

  bool model_satisfies_original() const
  {
    for ( auto const& c : original_ )
    {
      bool sat = false;
      for ( auto l : c )
      {
        if ( model_[var_of( l )] == ( l > 0 ) )
        {
          sat = true;
          break;
        }
      }
      if ( !sat )
        return false;
    }
    return true;
  }

  uint64_t seed_;
  std::mt19937_64 rng_;
  bool ok_{true};
  std::vector<uint8_t> assigns_;
  std::vector<uint32_t> level_;
  std::vector<uint32_t> reason_;
  std::vector<uint8_t> polarity_;
  std::vector<uint8_t> seen_;
  std::vector<double> activity_;
  std::vector<int> heap_pos_;
  std::vector<uint32_t> heap_;
  std::vector<std::vector<watcher>> watches_;
  std::vector<clause> clauses_;
  std::vector<uint32_t> free_;
  std::vector<std::vector<lit>> original_;
  std::vector<uint32_t> trail_;
  std::vector<uint32_t> trail_lim_;
  uint32_t qhead_{0};
  double var_inc_{1.0};
  double cla_inc_{1.0};
  uint64_t next_reduce_{2000u};
  uint32_t reductions_{0};
  std::vector<uint32_t> analyze_stack_;
  std::vector<uint32_t> analyze_toclear_;
  std::vector<uint32_t> lbd_stamp_;
  uint32_t lbd_counter_{0};
  std::vector<bool> model_;
  sat_stats stats_;
};

} // namespace exsyn
