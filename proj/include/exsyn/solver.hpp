#pragma once

#include "formula.hpp"
#include "sat.hpp"

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace exsyn
{

struct sat_result
{
  sat_status status{sat_status::unknown};
  std::vector<bool> model; /* indexed by variable, entry 0 unused */
  sat_stats stats;
};

/*! \brief Solves a CNF with the embedded CDCL core. */
inline sat_result solve_sat( cnf const& f, sat_budget const& budget = {}, uint64_t seed = 0u )
{
  sat_solver s( seed );
  s.add_cnf( f );
  sat_result r;
  r.status = s.solve( budget );
  r.stats = s.stats();
  if ( r.status == sat_status::sat )
  {
    r.model = s.model();
    r.model.resize( f.num_vars + 1u, false );
    if ( !f.satisfied_by( r.model ) )
      throw std::logic_error( "internal error: model does not satisfy the formula" );
  }
  return r;
}

class external_solver_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief Environment variable naming the external solver command. */
constexpr char const* external_solver_env = "EXSYN_SAT_SOLVER";

/*! \brief Runs a DIMACS solver as `command <file>` and reads the competition output format.
 *
 * The model is checked locally; a wrong model is an error, never a result.
 * With a time budget the child is killed once the budget has elapsed.
 */
inline sat_result solve_sat_external( cnf const& f, std::string const& command, sat_budget const& budget = {} )
{
  namespace fs = std::filesystem;
  if ( command.empty() )
    throw external_solver_error( "no external solver command given" );
  auto const t0 = std::chrono::steady_clock::now();

  auto tmpl = ( fs::temp_directory_path() / "exsyn-XXXXXX" ).string();
  std::vector<char> buf( tmpl.begin(), tmpl.end() );
  buf.push_back( '\0' );
  int fd = ::mkstemp( buf.data() );
  if ( fd < 0 )
    throw external_solver_error( "cannot create a temporary file" );
  ::close( fd );
  std::string const cnf_path( buf.data() );
  std::string const out_path = cnf_path + ".out";
  {
    std::ofstream o( cnf_path );
    o << to_dimacs( f );
  }

  std::string const shell = "{ " + command + " '" + cnf_path + "'; } > '" + out_path + "' 2>/dev/null";
  pid_t pid = ::fork();
  if ( pid < 0 )
  {
    fs::remove( cnf_path );
    throw external_solver_error( "fork failed" );
  }
  if ( pid == 0 )
  {
    ::setpgid( 0, 0 );
    ::execl( "/bin/sh", "sh", "-c", shell.c_str(), static_cast<char*>( nullptr ) );
    ::_exit( 127 );
  }
  ::setpgid( pid, pid );

  bool timed_out = false;
  int wstatus = 0;
  while ( true )
  {
    auto const w = ::waitpid( pid, &wstatus, WNOHANG );
    if ( w == pid )
      break;
    if ( w < 0 )
      break;
    auto const elapsed = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
    if ( ( budget.seconds && elapsed >= *budget.seconds ) || ( budget.stop && budget.stop->load() ) )
    {
      ::kill( -pid, SIGKILL );
      ::waitpid( pid, &wstatus, 0 );
      timed_out = true;
      break;
    }
    ::usleep( 2000 );
  }

  sat_result r;
  r.stats.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
  std::string output;
  {
    std::ifstream in( out_path );
    std::stringstream ss;
    ss << in.rdbuf();
    output = ss.str();
  }
  fs::remove( cnf_path );
  fs::remove( out_path );
  if ( timed_out )
  {
    r.status = sat_status::unknown;
    return r;
  }
  if ( WIFEXITED( wstatus ) && WEXITSTATUS( wstatus ) == 127 )
    throw external_solver_error( "external solver could not be started: " + command );

  std::optional<sat_status> status;
  std::vector<bool> model( f.num_vars + 1u, false );
  std::vector<bool> assigned( f.num_vars + 1u, false );
  bool model_done = false;
  std::istringstream in( output );
  std::string line;
  while ( std::getline( in, line ) )
  {
    if ( line.empty() || line[0] == 'c' )
      continue;
    std::istringstream ls( line );
    std::string tag;
    ls >> tag;
    if ( tag == "s" )
    {
      std::string word;
      ls >> word;
      if ( word == "SATISFIABLE" )
        status = sat_status::sat;
      else if ( word == "UNSATISFIABLE" )
        status = sat_status::unsat;
      else if ( word == "UNKNOWN" )
        status = sat_status::unknown;
      else
        throw external_solver_error( "unparsable status line: " + line );
    }
    else if ( tag == "v" )
    {
      std::string tok;
      while ( ls >> tok )
      {
        long v = 0;
        try
        {
          size_t used = 0;
          v = std::stol( tok, &used );
          if ( used != tok.size() )
            throw std::invalid_argument( tok );
        }
        catch ( std::exception const& )
        {
          throw external_solver_error( "unparsable value token: " + tok );
        }
        if ( v == 0 )
        {
          model_done = true;
          continue;
        }
        auto const x = static_cast<uint64_t>( std::labs( v ) );
        if ( x > f.num_vars )
          throw external_solver_error( "value line mentions unknown variable " + tok );
        model[x] = v > 0;
        assigned[x] = true;
      }
    }
    else
    {
      throw external_solver_error( "unexpected output line: " + line );
    }
  }
  if ( !status )
    throw external_solver_error( "no status line in solver output" );
  r.status = *status;
  if ( r.status == sat_status::sat )
  {
    if ( !model_done && f.num_vars > 0u )
      throw external_solver_error( "model is not terminated by 0" );
    if ( !f.satisfied_by( model ) )
      throw external_solver_error( "external model does not satisfy the formula" );
    r.model = std::move( model );
  }
  return r;
}

/*! \brief DIMACS competition output for a result (used by the `sat` subcommand). */
inline std::string format_sat_output( sat_result const& r, uint32_t num_vars )
{
  std::ostringstream os;
  if ( r.status == sat_status::sat )
  {
    os << "s SATISFIABLE\n";
    os << "v";
    for ( var v = 1; v <= num_vars; ++v )
      os << ' ' << ( r.model[v] ? static_cast<long>( v ) : -static_cast<long>( v ) );
    os << " 0\n";
  }
  else if ( r.status == sat_status::unsat )
    os << "s UNSATISFIABLE\n";
  else
    os << "s UNKNOWN\n";
  return os.str();
}

struct qbf_result
{
  sat_status status{sat_status::unknown}; /* unknown means the budget ran out */
  std::vector<bool> witness;              /* witness[i] is the value of S[i] */
  sat_stats stats;
  uint64_t copies{0};
  uint32_t expanded_vars{0};
  uint64_t expanded_clauses{0};

  std::string to_key_values() const
  {
    std::ostringstream os;
    os << "status=" << ( status == sat_status::unknown ? "timeout" : to_string( status ) ) << "\n"
       << "copies=" << copies << "\n"
       << "expanded_vars=" << expanded_vars << "\n"
       << "expanded_clauses=" << expanded_clauses << "\n"
       << stats.to_key_values();
    return os.str();
  }
};

/*! \brief An expanded 2-QBF kept in one incremental SAT instance.
 *
 * Blocking a witness adds a clause over S to the live solver, so the
 * expansion is done once per formula however many solutions are enumerated.
 */
class twoqbf_session
{
public:
  explicit twoqbf_session( qbf2 const& q, uint32_t cap = expansion_cap, uint64_t seed = 0u )
      : solver_( seed )
  {
    ex_ = expand_universal( q, cap );
    num_s_ = static_cast<uint32_t>( q.S.size() );
    solver_.reserve_vars( ex_.formula.num_vars );
    solver_.add_cnf( ex_.formula );
  }

  qbf_result solve( sat_budget const& budget = {} )
  {
    qbf_result r;
    r.copies = ex_.copies;
    r.expanded_vars = ex_.formula.num_vars;
    r.expanded_clauses = ex_.formula.clauses.size() + blocked_;
    auto const before = solver_.stats();
    r.status = solver_.solve( budget );
    r.stats = solver_.stats();
    r.stats.conflicts -= before.conflicts;
    r.stats.decisions -= before.decisions;
    r.stats.propagations -= before.propagations;
    r.stats.restarts -= before.restarts;
    r.stats.learnts -= before.learnts;
    r.stats.deleted -= before.deleted;
    r.stats.seconds -= before.seconds;
    if ( r.status == sat_status::sat )
    {
      auto const& m = solver_.model();
      std::vector<bool> full( ex_.formula.num_vars + 1u, false );
      for ( var v = 1; v < m.size() && v < full.size(); ++v )
        full[v] = m[v];
      if ( !ex_.formula.satisfied_by( full ) )
        throw std::logic_error( "internal error: witness does not satisfy the expansion" );
      for ( auto i = 0u; i < num_s_; ++i )
        r.witness.push_back( ex_.s_vars[i] < m.size() ? bool( m[ex_.s_vars[i]] ) : false );
    }
    return r;
  }

  /*! \brief Excludes the witness (an assignment to all of S). */
  void block( std::vector<bool> const& w )
  {
    if ( w.size() != num_s_ )
      throw std::invalid_argument( "witness must assign every S variable" );
    std::vector<lit> c;
    for ( auto i = 0u; i < w.size(); ++i )
      c.push_back( w[i] ? -static_cast<lit>( i + 1u ) : static_cast<lit>( i + 1u ) );
    add_clause_over_s( c );
  }

  /*! \brief Adds a clause whose literals refer to positions in S (literal i+1 is S[i]). */
  void add_clause_over_s( std::vector<lit> const& c )
  {
    ++blocked_;
    std::vector<lit> mapped;
    for ( auto l : c )
    {
      auto const i = static_cast<uint32_t>( std::abs( l ) ) - 1u;
      if ( i >= num_s_ )
        throw std::invalid_argument( "clause refers to a position outside S" );
      auto const v = static_cast<lit>( ex_.s_vars[i] );
      mapped.push_back( l > 0 ? v : -v );
    }
    solver_.add_clause( mapped );
  }

  expansion const& expanded() const { return ex_; }

private:
  expansion ex_;
  sat_solver solver_;
  uint32_t num_s_{0};
  uint64_t blocked_{0};
};

/*! \brief Decides exists S forall X exists Z by full expansion of X and one SAT call. */
inline qbf_result solve_2qbf( qbf2 const& q, sat_budget const& budget = {}, uint32_t cap = expansion_cap, uint64_t seed = 0u )
{
  twoqbf_session s( q, cap, seed );
  return s.solve( budget );
}

} // namespace exsyn
