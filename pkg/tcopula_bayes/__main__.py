from tcopula_bayes._cli import main

main()
