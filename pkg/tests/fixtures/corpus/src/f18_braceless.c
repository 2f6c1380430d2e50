void daxpy(int n, double alpha, const double *x, double *y)
{
    int i;
    #pragma acc parallel loop
    for (i = 0; i < n; i++)
        y[i] = alpha * x[i] + y[i];
}
